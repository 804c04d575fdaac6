# Generated by Django 5.2.5

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created', models.DateTimeField(auto_now_add=True)),
                ('subcommand', models.CharField(choices=[('eigen', 'Eigenbasis tables'), ('transform', 'Transform suite'), ('evolve', 'Free evolution'), ('profile', 'Profiles'), ('construct', 'Construction'), ('classify', 'Classification'), ('crosscheck', 'FD cross-check')], max_length=20)),
                ('config_hash', models.CharField(db_index=True, max_length=64)),
                ('config', models.JSONField()),
                ('status', models.CharField(choices=[('running', 'Running'), ('passed', 'Passed'), ('failed', 'Failed')], default='running', max_length=10)),
                ('exit_code', models.PositiveSmallIntegerField(default=0)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('manifest', models.JSONField(blank=True, null=True)),
                ('message', models.TextField(blank=True)),
            ],
        ),
        migrations.CreateModel(
            name='CheckResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=100)),
                ('anchor', models.CharField(blank=True, max_length=300)),
                ('passed', models.BooleanField()),
                ('value', models.JSONField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='checks', to='wavemaps.runrecord')),
            ],
            options={
                'ordering': ('id',),
            },
        ),
    ]
